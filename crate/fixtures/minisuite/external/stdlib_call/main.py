import os

def local():
    pass

os.getcwd()
local()
