#include <iostream>
#include <string>
#include <vector>

#include "batchpost/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return batchpost::cli::run(args, std::cout, std::cerr);
}
