#include "litsieve/cli.hpp"

int main(int argc, char** argv) { return litsieve::cli::dispatch(argc, argv); }
