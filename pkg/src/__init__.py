# Minimal Lab Package
