from to_import import func as f

f()
