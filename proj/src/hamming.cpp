#include "nvmag/hamming.hpp"

#include <stdexcept>

namespace nvmag::modem {

namespace {

// Parity-check columns of Hamming(7,4), 3 bits (p0 p1 p2) read MSB first.
constexpr std::array<std::uint8_t, 7> kH74Columns = {
    0b110,  // d0
    0b101,  // d1
    0b011,  // d2
    0b111,  // d3
    0b100,  // p0
    0b010,  // p1
    0b001,  // p2
};

constexpr std::array<std::uint8_t, kSymbolBits> kH11Columns = {
    0b0111, 0b1011, 0b1101, 0b1110, 0b1111, 0b0011, 0b0101,  // data
    0b1000, 0b0100, 0b0010, 0b0001,                          // parity
};

template <std::size_t N>
std::uint8_t syndrome(const std::array<bool, N>& word, const std::array<std::uint8_t, N>& columns) {
  std::uint8_t s = 0;
  for (std::size_t i = 0; i < N; ++i)
    if (word[i]) s ^= columns[i];
  return s;
}

// Parity bit j (0 = MSB of the column) covers the data bits whose column has it set.
template <std::size_t D, std::size_t P, std::size_t N>
std::array<bool, P> parity_of(const std::array<bool, D>& data, const std::array<std::uint8_t, N>& columns) {
  std::array<bool, P> parity{};
  for (std::size_t j = 0; j < P; ++j) {
    const std::uint8_t mask = static_cast<std::uint8_t>(1u << (P - 1 - j));
    bool p = false;
    for (std::size_t i = 0; i < D; ++i)
      if (data[i] && (columns[i] & mask)) p = !p;
    parity[j] = p;
  }
  return parity;
}

}  // namespace

Codeword7 hamming74_encode(std::uint8_t nibble) {
  std::array<bool, 4> data{};
  for (std::size_t i = 0; i < 4; ++i) data[i] = (nibble >> (3 - i)) & 1u;
  const auto parity = parity_of<4, 3>(data, kH74Columns);
  Codeword7 word{};
  for (std::size_t i = 0; i < 4; ++i) word[i] = data[i];
  for (std::size_t j = 0; j < 3; ++j) word[4 + j] = parity[j];
  return word;
}

Hamming74Decoded hamming74_decode(const Codeword7& word) {
  Codeword7 fixed = word;
  const std::uint8_t s = syndrome(word, kH74Columns);
  if (s != 0) {
    // Every non-zero 3-bit syndrome names exactly one position.
    for (std::size_t i = 0; i < fixed.size(); ++i)
      if (kH74Columns[i] == s) fixed[i] = !fixed[i];
  }
  std::uint8_t nibble = 0;
  for (std::size_t i = 0; i < 4; ++i) nibble = static_cast<std::uint8_t>((nibble << 1) | fixed[i]);
  return {nibble, s != 0};
}

CodedSymbol symbol_encode(char ch) {
  const auto code = static_cast<unsigned char>(ch);
  if (code > 0x7F) throw std::invalid_argument("symbol_encode: character is not 7-bit ASCII");
  CodedSymbol sym{};
  for (std::size_t i = 0; i < kDataBits; ++i) sym.data_bits[i] = (code >> (kDataBits - 1 - i)) & 1u;
  sym.parity_bits = parity_of<kDataBits, kParityBits>(sym.data_bits, kH11Columns);
  for (std::size_t i = 0; i < kDataBits; ++i) sym.tone_mask[i] = sym.data_bits[i];
  for (std::size_t j = 0; j < kParityBits; ++j) sym.tone_mask[kDataBits + j] = sym.parity_bits[j];
  return sym;
}

DecodedSymbol symbol_decode(const ToneMask& bits) {
  ToneMask fixed = bits;
  const std::uint8_t s = syndrome(bits, kH11Columns);
  bool uncorrectable = false;
  if (s != 0) {
    uncorrectable = true;
    for (std::size_t i = 0; i < kSymbolBits; ++i) {
      if (kH11Columns[i] == s) {
        fixed[i] = !fixed[i];
        uncorrectable = false;
        break;
      }
    }
  }
  unsigned code = 0;
  for (std::size_t i = 0; i < kDataBits; ++i) code = (code << 1) | (fixed[i] ? 1u : 0u);
  return {static_cast<char>(code), s != 0, uncorrectable};
}

}  // namespace nvmag::modem
