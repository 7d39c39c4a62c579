s = input().strip()
r = s[::-1]
while r:
    pass
print(r)
