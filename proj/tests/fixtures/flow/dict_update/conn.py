import psycopg2

opts = {"host": "pg-main.example.net", "dbname": "main"}
opts.update(user="svc_main", password="Main-svc-22")
conn = psycopg2.connect(**opts)
