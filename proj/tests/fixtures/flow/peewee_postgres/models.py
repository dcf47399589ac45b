import peewee

PG = {"host": "10.60.0.9", "user": "wiki", "password": "W1ki-pw"}
db = peewee.PostgresqlDatabase("wiki", **PG)
