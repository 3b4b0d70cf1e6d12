#include "zeroone/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return zeroone::run_cli(argc, argv, std::cout, std::cerr);
}
