import pymysql

conn = pymysql.connect(host="10.4.5.8", user="nopass", database="open")
