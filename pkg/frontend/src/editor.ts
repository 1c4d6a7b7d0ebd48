// Click-to-place pose editor: joints are placed one at a time in the
// canonical joint order, and whatever remains unplaced stays unlabeled.

export interface PlacedJoint {
  x: number;
  y: number;
}

export interface EditorState {
  jointNames: string[];
  placed: readonly PlacedJoint[];
}

export function emptyEditor(jointNames: string[]): EditorState {
  return { jointNames, placed: [] };
}

export function nextJointName(state: EditorState): string | null {
  return state.jointNames[state.placed.length] ?? null;
}

export function isComplete(state: EditorState): boolean {
  return state.placed.length >= state.jointNames.length;
}

/** Place the next joint; extra clicks after the last joint are ignored. */
export function placeJoint(state: EditorState, x: number, y: number): EditorState {
  if (isComplete(state)) return state;
  return { ...state, placed: [...state.placed, { x, y }] };
}

export function undoJoint(state: EditorState): EditorState {
  if (state.placed.length === 0) return state;
  return { ...state, placed: state.placed.slice(0, -1) };
}

export function clearJoints(state: EditorState): EditorState {
  return { ...state, placed: [] };
}

/** Flatten to x, y, visibility triples; unplaced joints stay at 0, 0, 0. */
export function toKeypoints(state: EditorState): number[] {
  const flat: number[] = [];
  for (let i = 0; i < state.jointNames.length; i += 1) {
    const joint = state.placed[i];
    if (joint === undefined) {
      flat.push(0, 0, 0);
    } else {
      flat.push(joint.x, joint.y, 2);
    }
  }
  return flat;
}
