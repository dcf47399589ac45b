from sqlalchemy import create_engine

template = "postgresql://{user}:{pw}@{host}/{db}"
url = template.format(user="fmt", pw="F0rmat-pw", host="fmt-db.example.net", db="fmt")
engine = create_engine(url)
