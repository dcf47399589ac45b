import psycopg2
from config import HOST, USER, PASSWORD

conn = psycopg2.connect(host=HOST, user=USER, password=PASSWORD, dbname="analytics")
