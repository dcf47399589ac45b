import pyodbc

conn = pyodbc.connect("DRIVER={ODBC Driver 18 for SQL Server};SERVER=52.14.77.200;DATABASE=ledger;UID=ledger;PWD=L3dger$pw")
