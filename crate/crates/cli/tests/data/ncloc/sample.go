// Package main prints a banner.
package main

import "fmt"

/*
banner is printed verbatim
*/
const banner = `line one
// still inside the raw string
`

func main() { // entry
	s := "/* not a comment */"
	/* inline */ fmt.Println(banner)
	fmt.Println(s) /* trailing
	comment continues */
	// fmt.Println("disabled")
}
// end
