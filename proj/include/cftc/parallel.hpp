#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace cftc {

/// Worker count: `CFTC_JOBS` when set to a positive integer, otherwise the
/// hardware concurrency.
inline std::size_t job_count()
{
    if ( const char* env = std::getenv( "CFTC_JOBS" ) ) {
        try {
            const long n = std::stol( env );
            if ( n > 0 )
                return static_cast<std::size_t>( n );
        }
        catch ( const std::exception& ) {
        }
    }
    return std::max<std::size_t>( 1, std::thread::hardware_concurrency() );
}

/// Evaluates `fn(i)` for every `i < count` on up to `jobs` threads. Results
/// come back in index order; if any call throws, the exception of the
/// lowest failing index is rethrown.
template <typename Fn>
auto parallel_map( std::size_t count, Fn&& fn, std::size_t jobs = job_count() )
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>>
{
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<std::optional<Result>> slots( count );
    std::vector<std::exception_ptr> errors( count );
    std::atomic<std::size_t> next{ 0 };

    auto work = [&] {
        for ( std::size_t i = next++; i < count; i = next++ ) {
            try {
                slots[i].emplace( fn( i ) );
            }
            catch ( ... ) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t workers = std::min( std::max<std::size_t>( jobs, 1 ), count );
    if ( workers <= 1 ) {
        work();
    }
    else {
        std::vector<std::jthread> pool;
        pool.reserve( workers );
        for ( std::size_t w = 0; w < workers; ++w )
            pool.emplace_back( work );
    }

    for ( auto& e : errors )
        if ( e )
            std::rethrow_exception( e );
    std::vector<Result> out;
    out.reserve( count );
    for ( auto& s : slots )
        out.push_back( std::move( *s ) );
    return out;
}

} // namespace cftc
