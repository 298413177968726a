#include "inhomwalk/cli.hpp"

int main(int argc, char** argv) { return inhomwalk::cli::run(argc, argv); }
