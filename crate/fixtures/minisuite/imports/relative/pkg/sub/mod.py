from ..helpers import helper as h

def run():
    h()
