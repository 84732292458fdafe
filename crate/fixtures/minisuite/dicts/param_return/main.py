def func():
    pass

def get(table):
    return table["f"]

fn = get({"f": func})
fn()
