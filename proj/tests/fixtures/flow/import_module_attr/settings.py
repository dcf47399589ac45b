MONGO_HOST = "mongo-1.example.io"
MONGO_USER = "tracker"
MONGO_PASSWORD = "Track3r-mongo"
