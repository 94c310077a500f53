// Trigram profiles of a few short texts; texts sharing vocabulary land closer together.

#include <cstdio>
#include <string_view>

#include "hdwear/codebook.hpp"
#include "hdwear/encoding.hpp"

int main() {
  using namespace hdwear;
  const ItemMemory letters(7, 10000, 256);
  constexpr std::string_view texts[] = {
      "the quick brown fox jumps over the lazy dog",
      "a quick brown dog jumps over the lazy fox",
      "sensors on the wrist sample acceleration at fifty hertz",
  };
  AccumHV profiles[3];
  for (int i = 0; i < 3; ++i) profiles[i] = encode_text(texts[i], 3, letters);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      std::printf("cos(text %d, text %d) = %.3f\n", i, j, cosine(profiles[i], profiles[j]));
    }
  }
}
