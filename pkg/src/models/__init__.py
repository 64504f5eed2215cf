# Data models package