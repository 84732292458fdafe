def fallback():
    pass

def run(fn=fallback):
    fn()

run()
