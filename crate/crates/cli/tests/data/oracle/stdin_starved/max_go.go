package main

import "fmt"

func main() {
	var n int
	fmt.Scan(&n)
	best := 0
	for i := 0; i < n; i++ {
		var x int
		fmt.Scan(&x)
		if i == 0 || x > best {
			best = x
		}
	}
	var extra int
	fmt.Scan(&extra)
	fmt.Println(best)
}
