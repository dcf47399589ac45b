import pymysql


def open_db(host="mysql.legacy.example.com", user="legacy", password="L3gacy-pw"):
    return pymysql.connect(host=host, user=user, password=password)
