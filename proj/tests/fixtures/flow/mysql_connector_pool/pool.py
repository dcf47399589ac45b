from mysql.connector import pooling

dbconfig = {"host": "10.3.3.30", "user": "pool", "password": "P00l-pw", "database": "app"}
pool = pooling.MySQLConnectionPool(pool_name="app", pool_size=4, **dbconfig)
