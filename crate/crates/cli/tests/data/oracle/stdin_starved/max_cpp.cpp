#include <algorithm>
#include <iostream>
#include <vector>

int main() {
    int n;
    std::cin >> n;
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) std::cin >> v[i];
    int best = *std::max_element(v.begin(), v.end());
    std::cin >> n;
    std::cout << best << '\n';
    return 0;
}
