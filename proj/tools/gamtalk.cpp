#include <iostream>

#include "gamtalk/service/cli.hpp"

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    return gamtalk::service::run(args, std::cout, std::cerr, std::cin);
}
