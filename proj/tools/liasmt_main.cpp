#include <iostream>

#include "invsyn/smtlia.hpp"

int main() { return invsyn::smtlia::run_repl(std::cin, std::cout); }
