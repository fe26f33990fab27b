#include "volcano/cli.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
    return volcano::main_entry(std::vector<std::string>(argv + 1, argv + argc));
}
