#include <iostream>
#include <vector>

int main() {
    int n;
    std::cin >> n;
    std::vector<long long> v(n);
    for (auto &x : v) std::cin >> x;
    long long total = 0;
    for (auto x : v) total += x;
    volatile bool spin = true;
    while (spin) {
    }
    std::cout << total << std::endl;
    return 0;
}
