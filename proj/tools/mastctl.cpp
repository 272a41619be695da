#include <iostream>
#include <string>
#include <vector>

#include "mast/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return mast::cli::run(args, std::cout, std::cerr);
}
