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
	fmt.Println(count)
	var m map[string]int
	m[line] = count
}
