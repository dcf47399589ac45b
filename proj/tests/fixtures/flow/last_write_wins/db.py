import pymysql

password = "old-Passw0rd"
password = "new-Passw0rd"
conn = pymysql.connect(host="10.7.7.7", user="lw", password=password)
