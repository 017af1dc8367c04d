#pragma once

#include <array>
#include <cstdint>

// Block codes used by the tone modem.
//
// Bit order everywhere is transmission order: index 0 is sent first and, for
// data fields, is the most significant bit.
namespace nvmag::modem {

// ---------------------------------------------------------------------------
// Hamming(7,4), systematic. Codeword = d0 d1 d2 d3 p0 p1 p2 with
//   p0 = d0 ^ d1 ^ d3
//   p1 = d0 ^ d2 ^ d3
//   p2 = d1 ^ d2 ^ d3
// i.e. G = [I4 | P], P rows 110, 101, 011, 111. Minimum distance 3.
// ---------------------------------------------------------------------------

using Codeword7 = std::array<bool, 7>;

// Low four bits of `nibble` are encoded, bit 3 first.
Codeword7 hamming74_encode(std::uint8_t nibble);

struct Hamming74Decoded {
  std::uint8_t nibble;
  bool corrected;  // syndrome was non-zero and one bit was flipped back
};

// Syndrome decoding. Every 7-bit word decodes; any single-bit error is
// corrected, while two errors are silently miscorrected.
Hamming74Decoded hamming74_decode(const Codeword7& word);

// ---------------------------------------------------------------------------
// Shortened (11,7) Hamming code for one ASCII character per symbol.
//
// Seven data bits (ASCII, MSB first) followed by four parity bits. The parity
// check matrix has the data columns
//   d0..d6 = 0111 1011 1101 1110 1111 0011 0101
// and the identity for p0..p3; column bits read (p0 p1 p2 p3). All eleven
// columns are distinct and non-zero, so every single-bit error has a unique
// syndrome. The four unused non-zero syndromes (1100 1010 1001 0110) can
// only arise from multi-bit errors and are reported as uncorrectable.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDataBits = 7;
inline constexpr std::size_t kParityBits = 4;
inline constexpr std::size_t kSymbolBits = kDataBits + kParityBits;

using ToneMask = std::array<bool, kSymbolBits>;

struct CodedSymbol {
  std::array<bool, kDataBits> data_bits;
  std::array<bool, kParityBits> parity_bits;
  ToneMask tone_mask;  // data_bits then parity_bits; index k drives tone k
};

// Throws std::invalid_argument for characters outside 7-bit ASCII.
CodedSymbol symbol_encode(char ch);

struct DecodedSymbol {
  char ch;
  bool corrected;      // non-zero syndrome
  bool uncorrectable;  // syndrome matches no column; ch holds the raw data bits
};

DecodedSymbol symbol_decode(const ToneMask& bits);

}  // namespace nvmag::modem
