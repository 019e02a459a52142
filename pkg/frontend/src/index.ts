export { EmptyInput, MissingColumn, parseCsv, requireColumn, Table } from "./csv";
export {
  FigureKind,
  PlotSpec,
  listSnapshotSteps,
  render,
  renderEnergyHistory,
  renderNormHistory,
  renderPhaseSpace,
  renderSnapshots,
} from "./figures";
export { Series, colormap, heatmap, linePlot, niceTicks, panelGrid } from "./svg";
