import os
username = "root"
password = "123456"
