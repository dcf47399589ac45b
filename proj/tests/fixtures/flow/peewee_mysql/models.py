from peewee import MySQLDatabase

db = MySQLDatabase("blog", host="blog-db.example.com", port=3306, user="blog", password="Bl0g-pw")
