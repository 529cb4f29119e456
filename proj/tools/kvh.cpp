#include "kvh/cli.hpp"

int main(int argc, char** argv) { return kvh::cli::run(argc, argv); }
