#include "bois/campaign.hpp"

int main(int argc, char** argv) { return bois::cli::run_cli(argc, argv); }
