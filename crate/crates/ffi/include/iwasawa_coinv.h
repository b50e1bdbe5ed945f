#ifndef IWASAWA_COINV_H
#define IWASAWA_COINV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IwcStatus {
  IWC_STATUS_OK = 0,
  IWC_STATUS_NULL_POINTER = 1,
  IWC_STATUS_PARAMETER = 2,
  IWC_STATUS_CONTEXT = 3,
  IWC_STATUS_DOMAIN = 4,
  IWC_STATUS_RESOURCE = 5,
  IWC_STATUS_CONTAINMENT = 6,
  IWC_STATUS_STRUCTURAL = 7,
  IWC_STATUS_UTF8 = 8,
  IWC_STATUS_PANIC = 9,
} IwcStatus;

/**
 * Subgroup family selector for [`IwcSubgroup`].
 */
typedef enum IwcSubgroupKind {
  /**
   * Principal congruence subgroup `G(p^k)`.
   */
  IWC_SUBGROUP_KIND_G = 0,
  IWC_SUBGROUP_KIND_H = 1,
  IWC_SUBGROUP_KIND_H_OPPOSITE = 2,
  IWC_SUBGROUP_KIND_T = 3,
  IWC_SUBGROUP_KIND_TLJ = 4,
  IWC_SUBGROUP_KIND_TLJ_UPPER = 5,
  IWC_SUBGROUP_KIND_TLJ_LOWER = 6,
} IwcSubgroupKind;

/**
 * Coset space `G/H(p^k)`.
 */
typedef struct IwcCosetSpace IwcCosetSpace;

/**
 * Finite quotient of `G^t` by its depth-`N` congruence subgroup.
 */
typedef struct IwcGroup IwcGroup;

/**
 * Cyclic module over the group algebra of an [`IwcGroup`].
 */
typedef struct IwcModule IwcModule;

/**
 * `k` is read by the single-index kinds, `l` and `j` by the `Tlj` kinds.
 */
typedef struct IwcSubgroup {
  enum IwcSubgroupKind kind;
  uint32_t k;
  uint32_t l;
  uint32_t j;
} IwcSubgroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Owned by the library.
 */
const char *iwc_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void iwc_string_free(char *s);

/**
 * # Safety
 * `out_delta` must be valid for writes.
 */
enum IwcStatus iwc_delta_of_p(uint64_t p, double *out_delta);

/**
 * Product identity `T(l,j) T(l,j)' T(l,j)'' = T(l-1,j-1)` at level `p^n`.
 *
 * # Safety
 * `out_holds` must be valid for writes.
 */
enum IwcStatus iwc_verify_product_identity(uint64_t p,
                                           uint32_t n,
                                           uint32_t l,
                                           uint32_t j,
                                           bool *out_holds);

/**
 * # Safety
 * `out_holds` must be valid for writes.
 */
enum IwcStatus iwc_verify_intersection_identity(uint64_t p,
                                                uint32_t n,
                                                uint32_t l,
                                                uint32_t j,
                                                bool *out_holds);

/**
 * # Safety
 * `out_space` must be valid for writes.
 */
enum IwcStatus iwc_coset_space_new(uint64_t p, uint32_t k, struct IwcCosetSpace **out_space);

/**
 * # Safety
 * `space` must be NULL or a live handle from [`iwc_coset_space_new`].
 */
void iwc_coset_space_free(struct IwcCosetSpace *space);

/**
 * Number of points `p^(k-1)`, which is also the module dimension.
 *
 * # Safety
 * `space` must be a live handle and `out_len` valid for writes.
 */
enum IwcStatus iwc_coset_space_len(const struct IwcCosetSpace *space, size_t *out_len);

/**
 * Number of invariant subspaces of the coset module.
 *
 * # Safety
 * `space` must be a live handle and `out_count` valid for writes.
 */
enum IwcStatus iwc_invariant_subspace_count(const struct IwcCosetSpace *space, size_t *out_count);

/**
 * Filtration of `F(d)` as a JSON document; free it with [`iwc_string_free`].
 *
 * # Safety
 * `space` must be a live handle and `out_json` valid for writes.
 */
enum IwcStatus iwc_decompose_json(const struct IwcCosetSpace *space,
                                  uint64_t d,
                                  bool relaxed,
                                  char **out_json);

/**
 * `copies` copies of `G(p^base)` modulo `p^depth`.
 *
 * # Safety
 * `out_group` must be valid for writes.
 */
enum IwcStatus iwc_group_new(uint64_t p,
                             uint32_t depth,
                             size_t copies,
                             uint32_t base,
                             size_t enum_cap,
                             struct IwcGroup **out_group);

/**
 * # Safety
 * `group` must be NULL or a live handle from [`iwc_group_new`].
 */
void iwc_group_free(struct IwcGroup *group);

/**
 * # Safety
 * `group` must be a live handle and `out_order` valid for writes.
 */
enum IwcStatus iwc_group_order(const struct IwcGroup *group, size_t *out_order);

/**
 * Seeded random cyclic module. The module keeps the group alive on its own.
 *
 * # Safety
 * `group` must be a live handle and `out_module` valid for writes.
 */
enum IwcStatus iwc_module_random(const struct IwcGroup *group,
                                 uint64_t seed,
                                 struct IwcModule **out_module);

/**
 * # Safety
 * `group` must be a live handle and `out_module` valid for writes.
 */
enum IwcStatus iwc_module_regular(const struct IwcGroup *group, struct IwcModule **out_module);

/**
 * # Safety
 * `group` must be a live handle and `out_module` valid for writes.
 */
enum IwcStatus iwc_module_trivial(const struct IwcGroup *group, struct IwcModule **out_module);

/**
 * # Safety
 * `module` must be NULL or a live module handle.
 */
void iwc_module_free(struct IwcModule *module);

/**
 * Dimension of the coinvariants under a subgroup of the first copy.
 *
 * # Safety
 * `module` and `subgroup` must be valid and `out_dim` valid for writes.
 */
enum IwcStatus iwc_module_coinvariant_dim(const struct IwcModule *module,
                                          const struct IwcSubgroup *subgroup,
                                          size_t *out_dim);

/**
 * Single-subgroup bound at `T(p^k)` with the minimal hypothesis constant.
 *
 * # Safety
 * `module` must be live and `out_holds` valid for writes.
 */
enum IwcStatus iwc_prop_single(const struct IwcModule *module, uint32_t k, bool *out_holds);

/**
 * Runs the verification suites for a TOML config (NULL or empty for defaults) and
 * returns the JSON-lines report.
 *
 * # Safety
 * `config_toml` must be NULL or a NUL-terminated string; out-pointers valid for writes.
 */
enum IwcStatus iwc_verify_json(const char *config_toml, char **out_report, bool *out_all_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IWASAWA_COINV_H */
