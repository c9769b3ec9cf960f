/** Server-side SVG rendering through the ECharts SSR mode (no DOM needed). */

import * as echarts from "echarts";

export interface RenderSize {
  width: number;
  height: number;
}

export function renderToSvg(option: object, size: RenderSize): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: size.width,
    height: size.height,
  });
  try {
    chart.setOption(option as echarts.EChartsOption);
    return canonicalizeClassIds(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/**
 * Generated ids carry process-global counters (renderer instance number and
 * class counter); strip the instance prefix and renumber class ids in order
 * of first appearance so re-rendering the same data yields identical bytes.
 */
function canonicalizeClassIds(svg: string): string {
  const prefixless = svg.replace(/\bzr\d+-/g, "zr-");
  const ids = new Map<string, number>();
  return prefixless.replace(/\bzr-cls-(\d+)\b/g, (match) => {
    let id = ids.get(match);
    if (id === undefined) {
      id = ids.size;
      ids.set(match, id);
    }
    return `zr-cls-${id}`;
  });
}
