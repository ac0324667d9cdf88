#include "critnum/cli.hpp"

#include <iostream>

int main(int argc, char ** argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    const auto result = critnum::cli::execute(args, critnum::cli::environment_from_process());
    if (!result.header.empty())
        std::cout << result.header << '\n';
    std::cout << result.payload;
    std::cerr << result.errors;
    return result.exit_code;
}
