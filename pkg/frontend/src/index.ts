export { parseCsv, readCsv, readProfile, readConvergence } from "./csv.js";
export type { Table, Profile, ConvergenceRow } from "./csv.js";
export { plotProfiles } from "./profiles.js";
export type { ProfileJob } from "./profiles.js";
export { observedRates, formatRateTable, rateTable } from "./rates.js";
export type { RateEntry, RateJob } from "./rates.js";
export { parseVtk, readVtk, fieldMap } from "./vtk.js";
export type { VtkGrid, FieldMapJob } from "./vtk.js";
export { LinePlot, colorScale, niceTicks } from "./svg.js";
