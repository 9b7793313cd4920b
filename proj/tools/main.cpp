#include "cli.hpp"

#include <csignal>
#include <iostream>

namespace {

extern "C" void on_signal(int) { redsv::cli::interrupt_flag().store(true); }

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    return redsv::cli::run(argc, argv, std::cout, std::cerr);
}
