#include <iostream>
#include <string>
#include <vector>

#include "sprobe/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return sprobe::cli::run(args, std::cout, std::cerr);
}
