#include <optf/cli.hpp>

int main(int argc, char** argv) { return optf::cli::run(argc, argv); }
