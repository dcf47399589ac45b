import yaml

with open("config.yml") as f:
    _raw = yaml.safe_load(f)

DB_HOST = _raw["host"]
DB_PASSWORD = "Mixed-pw-9"
