#include "gssm/commands.hpp"

int main(int argc, char** argv) { return gssm::cli::run(argc, argv); }
