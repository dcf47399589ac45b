import pymongo
import settings

client = pymongo.MongoClient(settings.MONGO_HOST, 27017, username=settings.MONGO_USER, password=settings.MONGO_PASSWORD)
