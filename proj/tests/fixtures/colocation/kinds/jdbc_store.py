import jaydebeapi

url = "jdbc:postgresql://pg.reports.example.org:5432/reports"
conn = jaydebeapi.connect("org.postgresql.Driver", url, ["reporter", "R3porter!pw"], "/opt/jdbc/postgresql.jar")
