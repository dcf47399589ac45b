import os
import pymysql

conn = pymysql.connect(host="10.2.3.4", user="env", password=os.environ["DB_PASSWORD"])
