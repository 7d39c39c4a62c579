// Reverse words.
#include <iostream>
#include <string>

/* helper
   declarations */ int helper();

int helper() { return 42; }

int main() {
    std::string s = "// not a comment";
    char c = '\'';
    /**/
    std::string t = "escaped \" /* still string */";
    // std::cout << "x";
    std::cout << s << c << t /* mid */ << helper()
              << '\n';
        
    return 0;
}
