from sqlalchemy import create_engine

USER = "orders"
PASSWORD = "0rders-pw"
HOST = "10.12.0.4"
engine = create_engine(f"postgresql+psycopg2://{USER}:{PASSWORD}@{HOST}:5432/orders")
