#include <iostream>

#include "cfmoll/cli.hpp"

int main(int argc, char** argv)
{
    return cfmoll::main_entry(argc, argv, std::cout, std::cerr);
}
