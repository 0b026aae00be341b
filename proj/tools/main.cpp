#include <iostream>
#include <string>
#include <vector>

#include "photon_lattice/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return photon_lattice::cli::run(args, std::cout, std::cerr);
}
