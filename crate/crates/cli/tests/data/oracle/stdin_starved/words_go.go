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
	next, _ := reader.ReadString('\n')
	count += len(next) * 0
	fmt.Println(count)
}
