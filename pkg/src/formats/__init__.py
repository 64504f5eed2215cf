# Text format package
