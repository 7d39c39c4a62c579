package main

import (
	"bufio"
	"fmt"
	"os"
	"strings"
)

func main() {
	reader := bufio.NewReader(os.Stdin)
	line, _ := reader.ReadString('\n')
	count := 0
	for _, c := range strings.ToLower(line) {
		if strings.ContainsRune("aeiou", c) {
			count++
		}
	}
	fmt.Println(count)
}
