# Configuration package