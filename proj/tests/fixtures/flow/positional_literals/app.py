import pymysql

conn = pymysql.connect("10.1.0.5", "report", "r3port-pw", "reports")
