#include "pokforge/prf.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>

#include "pokforge/errors.hpp"

namespace pokforge {

Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message) {
  Digest out{};
  unsigned int len = 0;
  static const std::uint8_t empty = 0;
  const std::uint8_t* key_ptr = key.empty() ? &empty : key.data();
  const std::uint8_t* msg_ptr = message.empty() ? &empty : message.data();
  if (!HMAC(EVP_sha256(), key_ptr, static_cast<int>(key.size()), msg_ptr, message.size(), out.data(),
            &len) ||
      len != out.size())
    throw Error("HMAC-SHA-256 computation failed");
  return out;
}

BitString respond(const BitString& key, const BitString& challenge) {
  const Digest d = hmac_sha256(key.packed(), challenge.packed());
  return BitString::from_packed(d, d.size() * 8);
}

KeyCheck key_check(const BitString& key) {
  static constexpr std::uint8_t label[] = {'P', 'O', 'K', '-', 'K', 'C', 'V'};
  const Digest d = hmac_sha256(key.packed(), label);
  KeyCheck out{};
  std::copy_n(d.begin(), out.size(), out.begin());
  return out;
}

}  // namespace pokforge
