class MyError(Exception):
    def report(self):
        pass

def risky():
    raise MyError()

try:
    risky()
except MyError as e:
    e.report()
