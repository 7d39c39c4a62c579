print(input().replace(',', ' '))
