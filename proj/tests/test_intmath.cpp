#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quadrics/intmath.hpp"

using namespace quadrics;

TEST_CASE("parsing and 64-bit round trips") {
    CHECK(parse_int("-12345678901234567890123") == Int("-12345678901234567890123"));
    CHECK_THROWS_AS(parse_int("12x"), InvalidInput);
    CHECK(fits_i64(Int(INT64_MAX)));
    CHECK(to_i64(Int(-77)) == -77);
    CHECK_THROWS_AS(to_i64(ipow(Int(2), 80)), TooLarge);
}

TEST_CASE("isqrt and squares") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        Int n = Int(static_cast<long>(rng.below(1000000000))) * Int(static_cast<long>(rng.below(1000000000)));
        Int r = isqrt(n);
        CHECK(r * r <= n);
        CHECK((r + 1) * (r + 1) > n);
        CHECK(is_square(n * n));
        Int root;
        CHECK(is_square(n * n, &root));
        CHECK(root == n);
    }
    CHECK_FALSE(is_square(Int(-4)));
}

TEST_CASE("round_div rounds to nearest") {
    CHECK(round_div(Int(7), Int(2)) == 4);   // 3.5 -> away from zero
    CHECK(round_div(Int(-7), Int(2)) == -4);
    CHECK(round_div(Int(9), Int(4)) == 2);
    CHECK(round_div(Int(10), Int(5)) == 2);
    CHECK(round_div(Int(-9), Int(4)) == -2);
    // nearest property: |a - q*b| <= |b|/2
    Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        Int a = Int(rng.range(-100000, 100000));
        Int b = Int(rng.range(1, 5000)) * (rng.below(2) ? 1 : -1);
        Int q = round_div(a, b);
        CHECK(2 * abs(a - q * b) <= abs(b));
    }
}

TEST_CASE("jacobi agrees with GMP") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        int64_t a = rng.range(-1000000, 1000000);
        uint64_t n = 2 * rng.below(500000) + 1;
        if (n < 3) n = 3;
        CHECK(jacobi_i64(a, n) == mpz_jacobi(Int(static_cast<long>(a)).get_mpz_t(), Int(static_cast<unsigned long>(n)).get_mpz_t()));
    }
}

TEST_CASE("kronecker symbol at 2") {
    CHECK(kronecker_at_2(Int(1)) == 1);
    CHECK(kronecker_at_2(Int(7)) == 1);
    CHECK(kronecker_at_2(Int(-1)) == 1);  // -1 = 7 mod 8
    CHECK(kronecker_at_2(Int(3)) == -1);
    CHECK(kronecker_at_2(Int(5)) == -1);
    CHECK(kronecker_at_2(Int(-3)) == -1);  // 5 mod 8
    CHECK(kronecker_at_2(Int(10)) == 0);
}

TEST_CASE("primality and factorization") {
    auto ps = primes_below(1000);
    for (int64_t n = 2; n < 1000; ++n) {
        bool in_list = std::find(ps.begin(), ps.end(), n) != ps.end();
        CHECK(is_prime_u64(static_cast<uint64_t>(n)) == in_list);
    }
    CHECK(is_prime_u64(2305843009213693951ull));  // 2^61 - 1
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        uint64_t n = rng.below(1000000000000ull) + 2;
        std::map<uint64_t, unsigned> f;
        factor_u64(n, f);
        uint64_t prod = 1;
        for (auto& [p, e] : f) {
            CHECK(is_prime_u64(p));
            for (unsigned k = 0; k < e; ++k) prod *= p;
        }
        CHECK(prod == n);
    }
    auto f = factorize(Int("-720"));
    REQUIRE(f.size() == 3);
    CHECK(f[0] == std::pair<Int, unsigned>{Int(2), 4u});
    CHECK(f[1] == std::pair<Int, unsigned>{Int(3), 2u});
    CHECK(f[2] == std::pair<Int, unsigned>{Int(5), 1u});
    CHECK_THROWS_AS(factorize(Int(0)), ZeroInput);
}

TEST_CASE("square roots modulo prime powers") {
    for (uint64_t p : {3ull, 5ull, 7ull, 11ull, 13ull, 10007ull}) {
        for (uint64_t a = 1; a < std::min<uint64_t>(p, 50); ++a) {
            if (jacobi_i64(static_cast<int64_t>(a), p) != 1) continue;
            uint64_t r = sqrt_mod_p(a, p);
            CHECK(mulmod_u64(r, r, p) == a % p);
            uint64_t r3 = sqrt_mod_prime_power(a, p, 3);
            uint64_t pk = p * p * p;
            CHECK(mulmod_u64(r3, r3, pk) == a % pk);
        }
    }
}

TEST_CASE("mod inverse near the 64-bit edge") {
    int64_t m = 4611686018427387847ll;  // large prime-ish modulus
    for (int64_t a : {2ll, 3ll, 1234567891011ll}) {
        int64_t inv = mod_inverse_i64(a, m);
        CHECK(static_cast<int64_t>(mulmod_u64(static_cast<uint64_t>(a), static_cast<uint64_t>(inv), static_cast<uint64_t>(m))) == 1);
    }
}

TEST_CASE("spf sieve factors correctly") {
    SpfSieve spf(10000);
    Rng rng(9);
    for (int i = 0; i < 300; ++i) {
        uint64_t n = rng.below(9999) + 2;
        uint64_t prod = 1;
        spf.factor(n, [&](uint32_t p, unsigned e) {
            CHECK(is_prime_u64(p));
            for (unsigned k = 0; k < e; ++k) prod *= p;
        });
        CHECK(prod == n);
    }
}

TEST_CASE("deterministic rng") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng c(42);
    for (int i = 0; i < 100; ++i) {
        int64_t v = c.range(-5, 5);
        CHECK(v >= -5);
        CHECK(v <= 5);
    }
}

TEST_CASE("u128 isqrt") {
    unsigned __int128 big = (static_cast<unsigned __int128>(1) << 100) + 12345;
    unsigned __int128 r = u128_isqrt(big);
    CHECK(r * r <= big);
    CHECK((r + 1) * (r + 1) > big);
    __int128 root;
    CHECK(i128_square_root(static_cast<__int128>(144), &root));
    CHECK(root == 12);
    CHECK_FALSE(i128_square_root(static_cast<__int128>(145), &root));
}
