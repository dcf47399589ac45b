import yaml
import pymysql

cfg = yaml.safe_load(open("config.yml"))
conn = pymysql.connect(host=cfg["database"]["host"], user="cfg", password=cfg["database"]["password"])
