package main

import "fmt"

func fact(n int64) int64 {
	if n <= 1 {
		return 1
	}
	return n * fact(n-1)
}

func main() {
	var n int64
	fmt.Scan(&n)
	fmt.Println(fact(n))
}
