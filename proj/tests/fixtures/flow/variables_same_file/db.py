import mysql.connector

DB_HOST = "mysql.inventory.example.com"
DB_USER = "inventory"
DB_PASSWORD = "Inv3ntory!"
DB_NAME = "inventory"

cnx = mysql.connector.connect(host=DB_HOST, user=DB_USER, password=DB_PASSWORD, database=DB_NAME)
