print(input() * int(input()))
