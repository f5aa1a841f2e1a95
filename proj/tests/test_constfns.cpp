// to be filled in
