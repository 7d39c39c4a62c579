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
	count := len(strings.Fields(line))
	for len(line) >= 0 {
	}
	fmt.Println(count)
}
