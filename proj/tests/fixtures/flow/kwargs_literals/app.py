import pymysql

conn = pymysql.connect(host="db1.shop.example.com", user="shop", password="Sh0p-pw-1", database="shop")
