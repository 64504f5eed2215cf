# Bipath arc code toolkit
