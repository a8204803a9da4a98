#include <iostream>
#include <string>
#include <vector>

#include "dbarlab/cli_runner.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dbarlab::run_cli(args, std::cout, std::cerr);
}
