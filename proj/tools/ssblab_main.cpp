#include <iostream>

#include "ssblab/cli.hpp"

int main(int argc, char** argv) {
    return ssb::run_cli(argc, argv, std::cout, std::cerr);
}
