#include "pic/cli.hpp"

int main(int argc, char** argv) { return pic::cli::run(argc, argv); }
