#ifndef CESGRAPH_H
#define CESGRAPH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Default power-iteration tolerance for [`cg_eigenvector`].
 */
#define CG_DEFAULT_TOLERANCE 1e-10

/**
 * Default power-iteration cap for [`cg_eigenvector`].
 */
#define CG_DEFAULT_MAX_ITERATIONS 10000

typedef enum {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_ARGUMENT = 2,
  CG_STATUS_INVALID_UTF8 = 3,
  CG_STATUS_NOT_FOUND = 4,
  CG_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Rejected graph mutation: duplicate or empty label, self-loop,
   * unknown vertex, zero increment.
   */
  CG_STATUS_GRAPH = 6,
  CG_STATUS_IO = 7,
  CG_STATUS_PARSE = 8,
  /**
   * Centrality, community or network construction failed.
   */
  CG_STATUS_ANALYSIS = 9,
  CG_STATUS_PANIC = 10,
} CgStatus;

/**
 * Opaque weighted co-occurrence graph.
 */
typedef struct CgGraph CgGraph;

/**
 * Opaque community partition produced by [`cg_fast_greedy`].
 */
typedef struct CgPartition CgPartition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * successful call.
 */
const char *cg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cg_version(void);

CgGraph *cg_graph_new(void);

void cg_graph_free(CgGraph *g);

/**
 * Vertex count, 0 for a null handle.
 */
size_t cg_graph_vertex_count(const CgGraph *g);

/**
 * Edge count, 0 for a null handle.
 */
size_t cg_graph_edge_count(const CgGraph *g);

/**
 * Appends a vertex. `out_id` may be null.
 */
CgStatus cg_graph_add_vertex(CgGraph *g, const char *label, uint64_t frequency, size_t *out_id);

/**
 * Adds `delta` to the weight of edge `u`-`v`, creating it if absent. The
 * new weight goes to `out_weight` unless it is null.
 */
CgStatus cg_graph_upsert_edge(CgGraph *g, size_t u, size_t v, uint64_t delta, uint64_t *out_weight);

CgStatus cg_graph_find_vertex(const CgGraph *g, const char *label, size_t *out_id);

/**
 * Copies the label of `v` into `buf` with a trailing NUL. `out_len`, if not
 * null, receives the label length in bytes excluding the NUL, also when the
 * buffer is too small.
 */
CgStatus cg_graph_label(const CgGraph *g, size_t v, char *buf, size_t cap, size_t *out_len);

CgStatus cg_graph_frequency(const CgGraph *g, size_t v, uint64_t *out);

/**
 * Edges in canonical order (`u < v`, sorted by `u` then `v`), the order
 * used by edge betweenness. Each array needs `cg_graph_edge_count` slots.
 */
CgStatus cg_graph_edges(const CgGraph *g,
                        size_t *out_u,
                        size_t *out_v,
                        uint64_t *out_weight,
                        size_t cap);

/**
 * Eigenvector centrality on the largest component, maximum 1, zero
 * elsewhere. `out` needs one slot per vertex.
 */
CgStatus cg_eigenvector(const CgGraph *g,
                        double tolerance,
                        size_t max_iterations,
                        double *out,
                        size_t cap);

/**
 * Vertex and edge betweenness, each unordered pair counted once. With
 * `weighted`, an edge of weight `w` has length `1 / w`. `out_edge` may be
 * null to skip edge scores; otherwise it is filled in canonical edge order.
 */
CgStatus cg_betweenness(const CgGraph *g,
                        bool weighted,
                        double *out_vertex,
                        size_t vertex_cap,
                        double *out_edge,
                        size_t edge_cap);

/**
 * Fast-greedy agglomeration cut at maximum modularity. The partition is
 * written to `*out` and must be released with [`cg_partition_free`].
 */
CgStatus cg_fast_greedy(const CgGraph *g, CgPartition **out);

void cg_partition_free(CgPartition *p);

size_t cg_partition_vertex_count(const CgPartition *p);

size_t cg_partition_community_count(const CgPartition *p);

/**
 * Modularity of the partition, NaN for a null handle.
 */
double cg_partition_modularity(const CgPartition *p);

/**
 * Community id per vertex; ids are dense from 0.
 */
CgStatus cg_partition_assignment(const CgPartition *p, size_t *out, size_t cap);

/**
 * Weighted modularity of an arbitrary assignment with one entry per vertex.
 */
CgStatus cg_modularity(const CgGraph *g, const size_t *assignment, size_t len, double *out);

/**
 * Reads a JSONL post file, cleans it and builds the top-`k` co-occurrence
 * network. `rules_path` may be null for default rules and `area` may be null
 * for "area". The share of top-`k` tag occurrences that co-occur with another
 * top-`k` tag goes to `out_coverage` unless it is null.
 */
CgStatus cg_network_from_jsonl(const char *posts_path,
                               const char *rules_path,
                               const char *area,
                               size_t k,
                               CgGraph **out_graph,
                               double *out_coverage);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CESGRAPH_H */
