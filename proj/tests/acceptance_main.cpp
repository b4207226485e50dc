#include <iostream>
#include <string>

#include "fracorn/acceptance.hpp"

int main(int argc, char** argv) {
  fracorn::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::string list = argv[++i];
      size_t pos = 0;
      while (pos < list.size()) {
        size_t comma = list.find(',', pos);
        if (comma == std::string::npos) comma = list.size();
        try {
          opt.only.push_back(std::stoi(list.substr(pos, comma - pos)));
        } catch (const std::exception&) {
          std::cerr << "bad criterion id in --only: " << list << "\n";
          return 2;
        }
        pos = comma + 1;
      }
    } else if (a == "--corrupt-coefficient") {
      opt.corrupt_coefficient = true;
    } else {
      std::cerr << "usage: fracorn-acceptance [--only 1,2,...] [--corrupt-coefficient]\n";
      return 2;
    }
  }
  return fracorn::acceptance_main(opt, std::cout);
}
