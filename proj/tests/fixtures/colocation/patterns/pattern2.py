import pymysql as db


conn = db.connect("10.0.0.1", "test", "test")
cursor = conn.cursor()
